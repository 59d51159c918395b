from setuptools import setup, find_packages


version = {}
with open("rispursuit/version.py") as fp:
    exec(fp.read(), version)

__version__ = version['__version__']


REQUIRED_PACKAGES = ['torch>=1.10', 'numpy', 'scipy']

with open("README.md", "r") as h:
    long_description = h.read()

setup(
    name="rispursuit",
    version=__version__,
    author="rispursuit developers",
    description=("RIS-assisted interference alignment by block-structured "
                 "Riemannian pursuit, in Pytorch"),
    license='MIT',
    long_description=long_description,
    long_description_content_type="text/markdown",
    packages=find_packages(exclude=['tests']),
    install_requires=REQUIRED_PACKAGES,
    extras_require={'test': ['pytest'],
                    'docs': ['sphinx', 'sphinx_rtd_theme']},
    entry_points={'console_scripts': ['rispursuit=rispursuit.cli:main']},
    classifiers=[
        "Programming Language :: Python :: 3",
        "License :: OSI Approved :: MIT License",
        "Operating System :: OS Independent",
    ],
    python_requires='>=3.8',
)
