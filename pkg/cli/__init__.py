# CLI package: run configuration and batch commands
