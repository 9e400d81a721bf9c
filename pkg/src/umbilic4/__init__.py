"""Umbilic4: SO(4) harmonic cubics and special Lagrangian 4-fold checks"""

from importlib.metadata import PackageNotFoundError, version

try:
    __version__ = version("umbilic4")
except PackageNotFoundError:
    # running from a source checkout (pytest pythonpath=src)
    __version__ = "0.1.0"
