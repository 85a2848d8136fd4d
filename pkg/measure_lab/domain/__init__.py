"""Domain layer: value objects, result entities, ports and numerical services."""
