"""placeholder"""
ElementaryFactor = None
def apply_factors(*a, **k): raise NotImplementedError
def factorize(*a, **k): raise NotImplementedError
def free_particle(*a, **k): raise NotImplementedError
def hamiltonian_flow(*a, **k): raise NotImplementedError
def harmonic_oscillator(*a, **k): raise NotImplementedError
def schrodinger_demo(*a, **k): raise NotImplementedError
def symplectic_form(*a, **k): raise NotImplementedError
def symplectic_to_phase(*a, **k): raise NotImplementedError
