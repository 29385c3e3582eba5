__all__ = ["__version__", "SCHEMA_VERSION"]

__version__ = "0.3.0"

# Bumped whenever the JSON report layout changes.
SCHEMA_VERSION = 1
