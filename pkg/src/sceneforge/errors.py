"""Exception hierarchy shared across the pipeline stages.

Every stage raises subclasses of SceneforgeError so the CLI can map failures
to exit codes without string matching. Stage-specific exceptions live next to
the code that raises them and inherit from one of the bases below.
"""


class SceneforgeError(Exception):
    """Base class for all sceneforge errors."""


class ConfigurationError(SceneforgeError):
    """Bad or missing configuration / data files (CLI exit code 3)."""


class StageError(SceneforgeError):
    """A pipeline stage failed on otherwise valid configuration.

    `stage` tags which pipeline stage raised, for CLI reporting.
    """

    stage = "pipeline"

    def __str__(self) -> str:
        return f"[{self.stage}] {super().__str__()}"
