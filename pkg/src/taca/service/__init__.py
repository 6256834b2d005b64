"""HTTP service wrapping the engine, and the clients the CLI uses."""
