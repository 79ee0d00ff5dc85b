"""Python bindings for the rack core library."""

from ._core import (
    Index,
    LocalCorpus,
    RackError,
    extract_api_classes,
    extract_comment_query,
    extract_keywords,
    extract_methods,
    porter_stem,
    split_words,
    suggest,
)

__all__ = [
    "Index",
    "LocalCorpus",
    "RackError",
    "extract_api_classes",
    "extract_comment_query",
    "extract_keywords",
    "extract_methods",
    "porter_stem",
    "split_words",
    "suggest",
]
