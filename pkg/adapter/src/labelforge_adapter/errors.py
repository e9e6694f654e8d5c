"""Exception types raised by the adapter."""


class AdapterError(Exception):
    """Base class for adapter failures.

    Carries a short machine-readable ``code`` plus a human detail string so
    CLI error lines can be emitted as structured JSON.
    """

    code = "adapter-error"

    def __init__(self, detail: str):
        super().__init__(detail)
        self.detail = detail


class ConfigError(AdapterError):
    """Invalid adapter configuration (bad enum value, missing checkpoint...)."""

    code = "config-error"


class BackendError(AdapterError):
    """A model backend could not be resolved or failed to run."""

    code = "backend-error"


class InputError(AdapterError):
    """An input image or document is missing or malformed."""

    code = "input-error"
