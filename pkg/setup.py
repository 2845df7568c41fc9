from setuptools import setup, find_packages

setup(
    name="fuzzyconsensus",
    version="1.0.0",
    description="Fuzzy-number data representation, max-overlap consensus and robust location estimators",
    packages=find_packages(where="services", include=["shared*", "fuzzyconsensus*"]),
    package_dir={"": "services"},
    python_requires=">=3.10",
    install_requires=[
        "pydantic==2.7.1",
        "python-dotenv==1.0.1",
        "prometheus-client==0.20.0",
        "loguru==0.7.2",
        "numpy==1.26.4",
        "pandas==2.1.4",
    "scipy==1.11.4",
    ],
    extras_require={
        "test": ["pytest==8.2.2", "pytest-cov==5.0.0"],
    },
    entry_points={
        "console_scripts": ["fuzzyconsensus=fuzzyconsensus.main:main"],
    },
)
