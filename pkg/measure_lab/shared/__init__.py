"""Shared configuration and report models."""
