"""Periodic-table data used by the parser and the valence model."""

# All element symbols accepted inside brackets.
PERIODIC_TABLE = frozenset("""
H He Li Be B C N O F Ne Na Mg Al Si P S Cl Ar K Ca Sc Ti V Cr Mn Fe Co Ni Cu
Zn Ga Ge As Se Br Kr Rb Sr Y Zr Nb Mo Tc Ru Rh Pd Ag Cd In Sn Sb Te I Xe Cs
Ba La Ce Pr Nd Pm Sm Eu Gd Tb Dy Ho Er Tm Yb Lu Hf Ta W Re Os Ir Pt Au Hg Tl
Pb Bi Po At Rn Fr Ra Ac Th Pa U Np Pu Am Cm Bk Cf Es Fm Md No Lr Rf Db Sg Bh
Hs Mt Ds Rg Cn Nh Fl Mc Lv Ts Og
""".split())

STAR = "*"

# Organic subset: may be written without brackets, implicit H filled in
# from the valence table.
ORGANIC_SUBSET = frozenset({"B", "C", "N", "O", "P", "S", "F", "Cl", "Br", "I"})

# Elements that may carry the aromatic (lowercase) flag.
AROMATIC_ELEMENTS = frozenset({"B", "C", "N", "O", "P", "S", "Se", "As"})

# Lowercase aromatic symbols legal outside brackets.
AROMATIC_ORGANIC = frozenset({"b", "c", "n", "o", "p", "s"})

# Allowed valences, lowest first.  Atoms whose element is missing here are
# not valence-checked.
VALENCES = {
    "H": (1,),
    "B": (3,),
    "C": (4,),
    "N": (3, 5),
    "O": (2,),
    "F": (1,),
    "Si": (4,),
    "P": (3, 5),
    "S": (2, 4, 6),
    "Cl": (1,),
    "As": (3, 5),
    "Se": (2, 4, 6),
    "Br": (1,),
    "Te": (2, 4, 6),
    "I": (1,),
}

TWO_LETTER_SYMBOLS = frozenset(s for s in PERIODIC_TABLE if len(s) == 2)


def max_valence(element: str, charge: int = 0) -> int | None:
    """Upper bond-capacity bound for an element, or None when unchecked.

    A positive formal charge buys one extra bond per unit (ammonium-style);
    negative charge never raises the bound.
    """
    vals = VALENCES.get(element)
    if vals is None:
        return None
    return max(vals) + max(0, charge)


def implicit_hydrogens(element: str, bond_order_sum: float, charge: int = 0) -> int:
    """Implicit H count for an organic-subset atom.

    Picks the smallest allowed valence that fits the (ceiled) bond-order
    sum; clamps at zero when every valence is exceeded.
    """
    vals = VALENCES.get(element)
    if vals is None:
        return 0
    import math

    needed = math.ceil(bond_order_sum)
    for v in vals:
        if v + max(0, charge) >= needed:
            return v + max(0, charge) - needed
    return 0
