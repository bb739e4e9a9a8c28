"""clarq: cost-gated clarification for relational and vector queries.

The pipeline parses a natural-language request into a draft query, scores
its ambiguity against catalog statistics, ranks candidate clarification
facets by information utility, and asks the single most valuable question
only when the projected execution savings beat the cost of the dialogue.
"""

__version__ = "0.1.0"
