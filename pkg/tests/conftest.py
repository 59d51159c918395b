def pytest_configure(config):
    config.addinivalue_line(
        'markers', 'slow: desk-scale Monte-Carlo checks, deselect with '
        '-m "not slow"')
