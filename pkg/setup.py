"""
Setup script for the strtrend Python package.
"""

from setuptools import setup, find_packages

with open("README.md", "r", encoding="utf-8") as fh:
    long_description = fh.read()

setup(
    name="strtrend",
    version="1.0.0",
    description="Regional short-term-rental trend forecasting from prompt embeddings of region-month records",
    long_description=long_description,
    long_description_content_type="text/markdown",
    packages=find_packages(include=["strtrend", "strtrend.*"]),
    classifiers=[
        "Development Status :: 4 - Beta",
        "Intended Audience :: Science/Research",
        "License :: OSI Approved :: MIT License",
        "Operating System :: OS Independent",
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.9",
        "Programming Language :: Python :: 3.10",
        "Programming Language :: Python :: 3.11",
        "Topic :: Scientific/Engineering :: Artificial Intelligence",
    ],
    python_requires=">=3.9",
    install_requires=[
        "aiohttp>=3.8.0",
        "numpy>=1.22",
        "pandas>=1.5",
        "torch>=2.0",
        "PyYAML>=6.0",
        "matplotlib>=3.5",
    ],
    extras_require={
        "dev": [
            "pytest>=7.0.0",
            "pytest-asyncio>=0.21.0",
            "black>=22.0.0",
            "flake8>=4.0.0",
            "mypy>=0.950",
        ],
    },
    entry_points={"console_scripts": ["strtrend = strtrend.cli:main"]},
    keywords="forecasting, time-series, short-term-rental, embeddings, lstm, transformer",
)
