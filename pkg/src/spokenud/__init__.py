"""Convert Jefferson-notated ELAN transcripts of conversation into speech-extended CoNLL-U."""

__version__ = "0.1.0"
