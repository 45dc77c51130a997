"""Level-spacing statistics of fractional parts over algebraic number fields."""
