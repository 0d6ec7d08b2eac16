from setuptools import setup, find_packages

tests_require = ["pytest", "pytest-runner", "pytest-cov", "coverage"]

dev_require = [
    "pytest",
    "black",
    "twine",
    "sphinx_rtd_theme",
    "sphinx-autodoc-annotation",
    "recommonmark",
] + tests_require

with open("README.md", "r") as src:
    LONG_DESCRIPTION = src.read()

setup(
    name="mmissl",
    description="Explicit mutual-information self-supervised learning at toy scale.",
    long_description=LONG_DESCRIPTION,
    long_description_content_type="text/markdown",
    version="0.1.0",
    classifiers=[
        "Development Status :: 2 - Pre-Alpha",
        "Intended Audience :: Science/Research",
        "Natural Language :: English",
        "Programming Language :: Python :: 3 :: Only",
        "Programming Language :: Python :: 3.7",
        "Programming Language :: Python :: 3.8",
        "Programming Language :: Python :: 3.9",
        "Topic :: Scientific/Engineering :: Artificial Intelligence",
        "Topic :: Software Development :: Libraries :: Python Modules",
    ],
    keywords=[
        "self-supervised learning",
        "mutual information",
        "log-determinant",
        "generalised gaussian",
    ],
    packages=find_packages(exclude=["test*"]),
    package_data={"mmissl": ["data/configs/*.json"]},
    install_requires=[
        "pyrolite>=0.3",
        "numpy",
        "scipy>=1.6",
        "pandas",
        "matplotlib",
        "tqdm",
    ],
    extras_require={"dev": dev_require},
    tests_require=tests_require,
    test_suite="test",
    include_package_data=True,
    entry_points={"console_scripts": ["mmissl = mmissl.cli:main"]},
    license="MIT",
)
