"""Dynamics of monotone maps on finite metric trees and their induced hyperspace maps."""

__version__ = "0.1.0"
