# Base package: exceptions and abstract map interface
