"""Period map lab."""
