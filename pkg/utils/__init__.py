# Utils package for logging, configuration, reporting and plane geometry
