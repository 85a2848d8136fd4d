"""Infrastructure layer: sparse linear algebra backend and file IO."""
