"""GCTL* toolkit: graded path quantifiers, tree automata and games."""

__version__ = "0.1.0"
