"""Multimodal LLM screening evaluation harness for depression and PTSD."""

__version__ = "0.1.0"
