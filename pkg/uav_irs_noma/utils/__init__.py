"""Path helpers and the process-pool worker."""
