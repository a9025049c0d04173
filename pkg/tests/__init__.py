# Tests package for the MTD decision process
