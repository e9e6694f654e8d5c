"""Model adapter that produces proposal and classification documents.

The adapter wraps two kinds of models — a region segmenter and a crop
classifier — behind backend identifiers like ``demo:quant`` or
``hf:openai/clip-vit-base-patch32``, and emits the JSON documents that the
labeling pipeline consumes.  It talks to that pipeline only through files;
there is no shared in-process state.
"""

from labelforge_adapter.config import AdapterConfig, CROP_STRATEGIES
from labelforge_adapter.errors import AdapterError

__all__ = ["AdapterConfig", "CROP_STRATEGIES", "AdapterError"]
__version__ = "0.1.0"
