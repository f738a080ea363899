"""
Установочный скрипт протокола распространения доверия VCTP.
"""

from setuptools import setup, find_packages

with open("README.md", "r", encoding="utf-8") as fh:
    long_description = fh.read()

setup(
    name="vctp",
    version="1.0.0",
    description="Протокол распространения доверия для верифицируемых креденшалов: "
                "санитизируемые подписи, ABE и голосование в реестре",
    long_description=long_description,
    long_description_content_type="text/markdown",
    packages=find_packages(exclude=["tests", "tests.*", "examples", "examples.*"]),
    classifiers=[
        "Development Status :: 4 - Beta",
        "Intended Audience :: Developers",
        "Intended Audience :: Science/Research",
        "License :: OSI Approved :: MIT License",
        "Operating System :: OS Independent",
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.8",
        "Programming Language :: Python :: 3.9",
        "Programming Language :: Python :: 3.10",
        "Programming Language :: Python :: 3.11",
        "Topic :: Security :: Cryptography",
    ],
    python_requires=">=3.8",
    install_requires=[
        "cryptography>=41.0.0",
        "gmpy2>=2.1.5",
        "python-dotenv>=1.0.0",
        "jinja2>=3.1.0",
        "rich>=13.5.0",
    ],
    extras_require={
        "dev": [
            "pytest>=7.4.0",
            "hypothesis>=6.88.0",
            "black>=23.7.0",
            "flake8>=6.0.0",
            "mypy>=1.5.0",
        ],
    },
    entry_points={
        "console_scripts": [
            "vctp=vctp.main:main",
        ],
    },
    include_package_data=True,
    package_data={
        "vctp": [
            "data/*.json",
            "data/*.scenario",
            "templates/*.j2",
        ],
    },
)
