"""Informative COVID-19 tweet classification toolkit."""

from tweetinfo.corpus import Label, TweetRecord, DatasetSplit, CorpusStats

__version__ = "0.1.0"

__all__ = ["Label", "TweetRecord", "DatasetSplit", "CorpusStats", "__version__"]
