"""Rich console presentation for wulffcap."""
