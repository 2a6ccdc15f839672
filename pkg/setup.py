import setuptools

with open("README.md", "r") as fh:
    long_description = fh.read()

setuptools.setup(
    name="phstab",
    version="0.0.1",
    description="Simulation and exponential stability certificates for non-autonomous "
    "port-Hamiltonian systems on an interval.",
    long_description=long_description,
    long_description_content_type="text/markdown",
    packages=setuptools.find_packages(exclude=["tests", "examples"]),
    package_data={"phstab.cli": ["config.schema.json"]},
    install_requires=[i.strip() for i in open("requirements.txt").readlines()],
    entry_points={"console_scripts": ["phstab=phstab.__main__:run"]},
    classifiers=[
        "Programming Language :: Python :: 3",
        "License :: OSI Approved :: MIT License",
        "Operating System :: OS Independent",
    ],
    python_requires=">=3.8",
)
