"""placeholder"""
DecayReport = NormRatioReport = SchurReport = None
def decay_report(*a, **k): raise NotImplementedError
def m_infty_1_norm_estimate(*a, **k): raise NotImplementedError
def mod_norm(*a, **k): raise NotImplementedError
def operator_norm_experiment(*a, **k): raise NotImplementedError
def schur_sums(*a, **k): raise NotImplementedError
