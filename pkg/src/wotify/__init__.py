"""WoTify: a registry and package manager for Web of Things projects."""

__version__ = "0.1.0"
