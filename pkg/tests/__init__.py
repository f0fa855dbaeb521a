# Tests package for test cases 