import json

import pytest

from labelforge.errors import (
    DimensionMismatch,
    DuplicateId,
    ImageIdMismatch,
    NonCanonical,
    ParseError,
    RunSumMismatch,
)
from labelforge.mask import RleMask, rle_decode
from labelforge.protocol import (
    ClassificationDocument,
    ClassificationResult,
    ProposalEntry,
    ProposalsDocument,
    classifications_from_json,
    classifications_to_json,
    join_classifications,
    load_classifications,
    load_proposals,
    mock_backend,
    proposals_from_json,
    proposals_to_json,
    save_classifications,
    save_proposals,
)
from labelforge.synth import NoiseSpec, SceneSpec, trapezoid_road


def pdoc(image="img-1"):
    return ProposalsDocument(
        image=image,
        image_size=(4, 3),
        generator="test",
        proposals=(
            ProposalEntry(id="p0", mask=RleMask(4, 3, (0, 4, 8)), raw_score=0.9),
            ProposalEntry(id="p1", mask=RleMask(4, 3, (4, 4, 4))),
        ),
    )


def cdoc(image="img-1"):
    return ClassificationDocument(
        image=image,
        classifier="test",
        results=(
            ClassificationResult("p0", "drivable area", {"drivable area": 0.8, "sky": 0.2}),
            ClassificationResult("p1", "sky", {"drivable area": 0.1, "sky": 0.9}),
        ),
    )


def test_proposals_roundtrip():
    doc = pdoc()
    obj = proposals_to_json(doc)
    assert proposals_from_json(obj) == doc
    # through a real encode/decode cycle too
    assert proposals_from_json(json.loads(json.dumps(obj))) == doc


def test_proposals_json_shape():
    obj = proposals_to_json(pdoc())
    assert list(obj) == ["image", "image_size", "generator", "proposals"]
    assert obj["image_size"] == [4, 3]
    assert list(obj["proposals"][0]) == ["id", "mask", "raw_score"]
    assert list(obj["proposals"][1]) == ["id", "mask"]  # no score -> field absent


def test_proposals_file_roundtrip(tmp_path):
    path = tmp_path / "p.json"
    save_proposals(pdoc(), str(path))
    assert load_proposals(str(path)) == pdoc()
    # idempotent bytes
    first = path.read_bytes()
    save_proposals(pdoc(), str(path))
    assert path.read_bytes() == first


def base_proposals_obj():
    return proposals_to_json(pdoc())


@pytest.mark.parametrize(
    "mutate,exc",
    [
        (lambda o: o.pop("image"), ParseError),
        (lambda o: o.pop("image_size"), ParseError),
        (lambda o: o.pop("generator"), ParseError),
        (lambda o: o.pop("proposals"), ParseError),
        (lambda o: o.__setitem__("image", ""), ParseError),
        (lambda o: o.__setitem__("image_size", [4]), ParseError),
        (lambda o: o.__setitem__("image_size", [4.0, 3]), ParseError),
        (lambda o: o.__setitem__("image_size", [0, 3]), ParseError),
        (lambda o: o.__setitem__("proposals", {"p0": 1}), ParseError),
        (lambda o: o["proposals"][0].pop("id"), ParseError),
        (lambda o: o["proposals"][0].__setitem__("id", 7), ParseError),
        (lambda o: o["proposals"][0].pop("mask"), ParseError),
        (lambda o: o["proposals"][0].__setitem__("raw_score", "high"), ParseError),
        (lambda o: o["proposals"][1].__setitem__("id", "p0"), DuplicateId),
    ],
)
def test_invalid_proposals_rejected(mutate, exc):
    obj = base_proposals_obj()
    mutate(obj)
    with pytest.raises(exc):
        proposals_from_json(obj)


def test_mask_errors_carry_through():
    obj = base_proposals_obj()
    obj["proposals"][0]["mask"]["runs"] = [0, 4, 9]  # sums to 13, not 12
    with pytest.raises(RunSumMismatch):
        proposals_from_json(obj)
    obj = base_proposals_obj()
    obj["proposals"][0]["mask"]["runs"] = [0, 4, 0, 8]
    with pytest.raises(NonCanonical):
        proposals_from_json(obj)
    obj = base_proposals_obj()
    obj["proposals"][0]["mask"] = {"w": 5, "h": 3, "runs": [0, 5, 10]}
    with pytest.raises(DimensionMismatch):
        proposals_from_json(obj)  # mask size disagrees with document size


def test_classifications_roundtrip():
    doc = cdoc()
    assert classifications_from_json(classifications_to_json(doc)) == doc


def test_classifications_scores_serialized_sorted():
    doc = ClassificationDocument(
        image="i",
        classifier="c",
        results=(ClassificationResult("p", "b", {"b": 0.6, "a": 0.4}),),
    )
    obj = classifications_to_json(doc)
    assert list(obj["results"][0]["class_scores"]) == ["a", "b"]


def test_classifications_file_roundtrip(tmp_path):
    path = tmp_path / "c.json"
    save_classifications(cdoc(), str(path))
    assert load_classifications(str(path)) == cdoc()


def base_cls_obj():
    return classifications_to_json(cdoc())


@pytest.mark.parametrize(
    "mutate,exc",
    [
        (lambda o: o.pop("image"), ParseError),
        (lambda o: o.pop("classifier"), ParseError),
        (lambda o: o.pop("results"), ParseError),
        (lambda o: o["results"][0].pop("class_label"), ParseError),
        (lambda o: o["results"][0].__setitem__("class_scores", {}), ParseError),
        (lambda o: o["results"][0]["class_scores"].__setitem__("sky", 1.5), ParseError),
        (lambda o: o["results"][0]["class_scores"].__setitem__("sky", -0.1), ParseError),
        (lambda o: o["results"][0]["class_scores"].__setitem__("sky", "hot"), ParseError),
        (lambda o: o["results"][1].__setitem__("proposal_id", "p0"), DuplicateId),
    ],
)
def test_invalid_classifications_rejected(mutate, exc):
    obj = base_cls_obj()
    mutate(obj)
    with pytest.raises(exc):
        classifications_from_json(obj)


def test_load_missing_or_garbled_file(tmp_path):
    with pytest.raises(ParseError):
        load_proposals(str(tmp_path / "nope.json"))
    bad = tmp_path / "bad.json"
    bad.write_text("{oops")
    with pytest.raises(ParseError):
        load_classifications(str(bad))


def test_join_basic():
    joined, missing = join_classifications(pdoc(), cdoc())
    assert missing == []
    assert [p.id for p in joined] == ["p0", "p1"]  # document order
    assert joined[0].class_label == "drivable area"
    assert joined[0].source_image == "img-1"
    assert joined[0].raw_score == 0.9
    assert joined[1].class_scores == {"drivable area": 0.1, "sky": 0.9}


def test_join_reports_missing_ids():
    c = ClassificationDocument(image="img-1", classifier="t", results=(cdoc().results[0],))
    joined, missing = join_classifications(pdoc(), c)
    assert [p.id for p in joined] == ["p0"]
    assert missing == ["p1"]


def test_join_image_mismatch():
    with pytest.raises(ImageIdMismatch):
        join_classifications(pdoc("img-1"), cdoc("img-2"))


def test_join_orphan_result_is_error():
    c = ClassificationDocument(
        image="img-1",
        classifier="t",
        results=cdoc().results + (ClassificationResult("ghost", "sky", {"sky": 1.0}),),
    )
    with pytest.raises(ParseError):
        join_classifications(pdoc(), c)


def test_join_label_must_match_scores():
    c = ClassificationDocument(
        image="img-1",
        classifier="t",
        results=(
            ClassificationResult("p0", "sky", {"drivable area": 0.8, "sky": 0.2}),
            cdoc().results[1],
        ),
    )
    with pytest.raises(ParseError):
        join_classifications(pdoc(), c)


def test_mock_backend_produces_joinable_documents():
    scene = SceneSpec(
        width=32,
        height=24,
        road=trapezoid_road(32, 24),
        distractor_count=2,
        seed=11,
    )
    p, c = mock_backend(scene, NoiseSpec(), seed=3, image_id="mb-1")
    assert p.image == c.image == "mb-1"
    joined, missing = join_classifications(p, c)
    assert missing == []
    assert len(joined) == len(p.proposals)
    drivable = [x for x in joined if x.class_label == "drivable area"]
    assert len(drivable) == 1
    # zero noise: the drivable proposal is the road, bit for bit
    road = rle_decode(drivable[0].mask)
    assert road.shape == (24, 32)
