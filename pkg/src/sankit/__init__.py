"""Desk-scale Sanskrit NLP toolkit.

Subpackages cover canonical phoneme text and transliteration, declarative
sandhi joining/splitting, a file-driven inflected-form lexicon, lattice
word segmentation, joint morphological tagging and lemmatization,
arc-factored dependency parsing with gated auxiliary encoders, compound
semantic classification, token embeddings with intrinsic evaluation, and
an annotation HTTP service with session persistence.
"""

from .text import PhonemeString, Script, to_phonemes, transliterate
from .sandhi import RuleTable, SandhiRule, SplitCandidate, apply_join, split_candidates
from .lexicon import LexEntry, Lexicon, MorphTag

__all__ = [
    "PhonemeString", "Script", "to_phonemes", "transliterate",
    "RuleTable", "SandhiRule", "SplitCandidate", "apply_join", "split_candidates",
    "LexEntry", "Lexicon", "MorphTag",
]

__version__ = "0.1.0"
