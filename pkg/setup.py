#!/usr/bin/env python

from setuptools import find_packages, setup

setup(
    name="fewshape",
    version="0.1.0",
    description=(
        "Few-shot single-view 3D voxel reconstruction with class shape priors"
    ),
    long_description=open("README.md", encoding="utf8").read(),
    long_description_content_type="text/markdown",
    platforms="all",
    classifiers=[
        "License :: OSI Approved :: Apache Software License",
        "Intended Audience :: Science/Research",
        "Programming Language :: Python :: 3 :: Only",
        "Programming Language :: Python :: 3.8",
        "Programming Language :: Python :: 3.9",
        "Programming Language :: Python :: 3.10",
        "Programming Language :: Python :: 3.11",
        "Programming Language :: Python :: 3.12",
        "Topic :: Scientific/Engineering :: Image Recognition",
        "Development Status :: 3 - Alpha",
    ],
    license="Apache License, Version 2.0",
    packages=find_packages(include=("fewshape", "fewshape.*")),
    package_data={"fewshape": ["py.typed"]},
    python_requires=">=3.8",
    install_requires=[
        "mashumaro[orjson,msgpack,yaml,toml]>=3.10",
        "typing_extensions>=4.1.0",
        "numpy>=1.22",
        "torch>=2.0",
        "Pillow>=9.0",
        "tqdm>=4.60",
        "pytablewriter>=0.58.0",
        "orjson",
        "msgpack>=0.5.6",
        "pyyaml>=3.13",
        "tomli-w>=1.0",
        "tomli>=1.1.0;python_version<'3.11'",
    ],
    entry_points={
        "console_scripts": ["fewshape = fewshape.cli:main"],
    },
    zip_safe=False,
)
