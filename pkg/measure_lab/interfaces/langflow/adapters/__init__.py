"""Langflow adapters bridging components and use cases."""

from .lab_component_adapter import LabComponentAdapter

__all__ = ['LabComponentAdapter']
