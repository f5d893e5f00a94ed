import setuptools

# metadata and dependencies live in setup.cfg
setuptools.setup()
