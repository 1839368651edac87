from setuptools import setup, find_packages

setup(
    name="slcp",
    version="0.1.0",
    description="Sequential log-convex programming, logspace SQP and SQP with engineering benchmarks",
    long_description=open("README.md").read(),
    long_description_content_type="text/markdown",
    license="MIT",
    packages=find_packages(exclude=["tests", "tests.*"]),
    package_data={"slcp.problems": ["data/*.txt", "references/*.txt"]},
    install_requires=[
        "numpy>=1.22",
        "scipy>=1.8",
        "pandas>=1.4",
        "matplotlib>=3.5",
        "loguru>=0.6",
    ],
    python_requires=">=3.9",
    entry_points={"console_scripts": ["slcp=slcp._cli:main"]},
    classifiers=[
        "Development Status :: 4 - Beta",
        "Intended Audience :: Science/Research",
        "Topic :: Scientific/Engineering :: Mathematics",
        "License :: OSI Approved :: MIT License",
        "Programming Language :: Python :: 3.9",
        "Programming Language :: Python :: 3.10",
        "Programming Language :: Python :: 3.11",
        "Programming Language :: Python :: 3.12",
    ],
)
