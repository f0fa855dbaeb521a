# Analysis package: rate fits and estimate checks
