"""Application Layer

Use cases that run the lab's pipelines over a grid ladder and coordinate
the numerical services with persistence.
"""
