# Test suite for the Spinform verification engine
