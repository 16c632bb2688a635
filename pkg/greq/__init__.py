"""greq: a toolkit for goal-oriented requirements models written in the ``.greq`` language."""

__version__ = "0.1.0"
