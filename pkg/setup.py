from setuptools import setup, find_packages

with open("README.md", "r") as fp:
    long_description = fp.read()

setup(
    name='ahesim',
    version='0.1.0a',
    description=
    'Similarity search over additively homomorphically encrypted music embeddings',
    long_description=long_description,
    long_description_content_type='text/markdown',
    classifiers=[
        "Programming Language :: Python :: 3",
        "License :: OSI Approved :: BSD License",
        "Operating System :: OS Independent",
    ],
    python_requires='>=3.7',
    packages=find_packages(
        exclude=["*.tests", "*.tests.*", "tests.*", "tests"]),
    install_requires=[
        'numpy',
        'gmpy2',
        'aenum',
        'tabulate',
        'scikit-learn',
        'psutil',
        'fastapi',
        'pydantic',
        'uvicorn',
        'requests',
    ],
    extras_require={
        'testing': [
            'coverage', 'pytest', 'yapf==0.31', 'pytest-cov', 'pytest-xdist',
            'pytest-timeout', 'httpx'
        ],
        'docs': [
            'sphinx', 'sphinx_rtd_theme', 'sphinx-autodoc-typehints',
            'jinja2<3.1'
        ],
    },
    entry_points={'console_scripts': ['ahesim=ahesim.cli:run']})
