"""Shintani-cone constructions of Stickelberger elements and localized Rubin-Stark elements."""

__version__ = "0.1.0"
