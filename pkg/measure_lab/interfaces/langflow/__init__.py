"""Langflow Interface Adapters

Adapts the application layer to the Langflow component interface.
"""
