"""sceneforge: compile natural-language field descriptions into engine scene scripts."""

__version__ = "0.1.0"
