"""minisa: a miniature static-analysis toolchain for MiniC."""

__version__ = "0.1.0"
