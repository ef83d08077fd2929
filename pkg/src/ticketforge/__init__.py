"""Service-desk ticket analytics: cleansing, language ID, translation,
entity extraction, topic models, summarization, sentiment, predictive
models and a faceted search engine."""

__version__ = "0.1.0"
