"""Direct sampling reconstruction of conductivity and potential inclusions in a disk.

Modules
-------
special         modified Bessel functions and Legendre polynomials
boundary        boundary traces, Fourier coefficients and Sobolev pairings
probing         eigenfunctions and monopole/dipole probing functions of the disk
kernels         the four index kernels, their maximizers and the ball variant
forward         finite elements, transmission oracles, point sources and noise
reconstruction  index fields on sampling grids
cli             command-line front end
"""

__version__ = "0.1.0"
