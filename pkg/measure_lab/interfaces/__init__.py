"""Interface Layer

Command line and Langflow entry points onto the application use cases.
"""
