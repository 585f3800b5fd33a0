"""Sentence realization from shuffled, lemmatized dependency structures.

The pipeline has two independent stages: a character-level encoder-decoder
that reinflects lemmas into surface forms, and an n-gram language-model
search that recovers word order from the resulting word bag.
"""

__version__ = "0.1.0"
