"""Published flows and recursion-operator tables, transcribed as printed.

Every entry is in the ring grammar with ``ab`` standing for ``a_b`` of the
entry's base level.  Where the printed source is malformed the transcription
takes the reading noted in ``TRANSCRIPTION_NOTES``; numeric disagreements with
re-derived values are not fixed here but reported by the solver.
"""
from __future__ import annotations

# (family, base) -> {order: rhs}
FLOWS = {
    ("kdv", 3): {
        3: "-4/P*a^-2*ab",
        5: "a^5*u5 + 5/2*a^4*ab*u4^2",
        7: (
            "a^7*u7 + 14*a^6*ab*u6*u4 + 21/2*a^6*ab*u5^2"
            " + a^5*(98*ab^2 + 35/8*P*a^6)*u5*u4^2"
            " + a^4*ab*(189/2*ab^2 + 399/32*P*a^6)*u4^4"
        ),
        9: (
            "a^9*u9 + 27*a^8*ab*u8*u4 + 57*a^8*ab*u7*u5 + 69/2*a^8*ab*u6^2"
            " + a^7*(360*ab^2 + 105/8*P*a^6)*u7*u4^2"
            " + a^7*(1230*ab^2 + 189/4*P*a^6)*u6*u5*u4"
            " + a^7*(290*ab^2 + 91/8*P*a^6)*u5^3"
            " + 330*a^6*ab*(9*ab^2 + P*a^6)*u6*u4^3"
            " + a^6*ab*(6105*ab^2 + 11187/16*P*a^6)*u5^2*u4^2"
            " + a^5*(16335*ab^4 + 29469/8*P*a^6*ab^2 + 6699/128*P^2*a^12)*u5*u4^4"
            " + a^4*ab*(19305/2*ab^4 + 57915/16*P*a^6*ab^2 + 39325/256*P^2*a^12)*u4^6"
        ),
    },
    ("skk", 5): {
        5: "1/2*a^6*ab^-1",
        7: "a^7*u7 + 7/2*a^6*ab*u6^2",
        11: (
            "a^11*u11 + 33*a^10*ab*u10*u6 + 77*a^10*ab*u9*u7 + 99/2*a^10*ab*u8^2"
            " + 682*a^9*ab^2*u9*u6^2 + 2574*a^9*ab^2*u8*u7*u6 + 1892/3*a^9*ab^2*u7^3"
            " + 10098*a^8*ab^3*u8*u6^3 + 22066*a^8*ab^3*u7^2*u6^2"
            " + 107525*a^7*ab^4*u7*u6^4 + 752675/6*a^6*ab^5*u6^6"
        ),
    },
    ("skk", 4): {
        5: "a^5*u5",
        7: "a^7*u7 + 14*a^6*ab*u6*u5 + 35*a^5*ab^2*u5^3",
        11: (
            "a^11*u11 + 44*a^10*ab*u10*u5 + 110*a^10*ab*u9*u6 + 176*a^10*ab*u8*u7"
            " + 1144*a^9*ab^2*u9*u5^2 + 5016*a^9*ab^2*u8*u6*u5 + 3267*a^9*ab^2*u7^2*u5"
            " + 4466*a^9*ab^2*u7*u6^2 + 21692*a^8*ab^3*u8*u5^3"
            " + 118184*a^8*ab^3*u7*u6*u5^2 + 164560/3*a^8*ab^3*u6^3*u5"
            " + 309485*a^7*ab^4*u7*u5^4 + 871420*a^7*ab^4*u6^2*u5^3"
            " + 3225750*a^6*ab^5*u6*u5^5 + 9784775/3*a^5*ab^6*u5^7"
        ),
    },
    ("skk", 3): {
        5: "a^5*u5 + 5*a^4*ab*u4^2",
        7: (
            "a^7*u7 + 21*a^6*ab*u6*u4 + 14*a^6*ab*u5^2 + 245*a^5*ab^2*u4^2*u5"
            " + 455*a^4*ab^3*u4^4"
        ),
        11: (
            "a^11*u11 + 55*a^10*ab*u10*u4 + 154*a^10*ab*u9*u5 + 286*a^10*ab*u8*u6"
            " + 176*a^10*ab*u7^2 + 1760*a^9*ab^2*u9*u4^2 + 8844*a^9*ab^2*u8*u5*u4"
            " + 14014*a^9*ab^2*u7*u6*u4 + 9482*a^9*ab^2*u7*u5^2 + 12199*a^9*ab^2*u6^2*u5"
            " + 41140*a^8*ab^3*u8*u4^3 + 268532*a^8*ab^3*u7*u5*u4^2"
            " + 173723*a^8*ab^3*u6^2*u4^2 + 476850*a^8*ab^3*u6*u5^2*u4"
            " + 164560/3*a^8*ab^3*u5^4 + 743325*a^7*ab^4*u7*u4^4"
            " + 5344460*a^7*ab^4*u6*u5*u4^3 + 11133980/3*a^7*ab^4*u5^3*u4^2"
            " + 10343905*a^6*ab^5*u6*u4^5 + 36171410*a^6*ab^5*u5^2*u4^4"
            " + 320101925/3*a^5*ab^6*u5*u4^6 + 283758475/3*a^4*ab^7*u4^8"
        ),
    },
}

# Seeds of each (family, base): (order, rhs, provenance label).
SEEDS = {
    ("kdv", 3): (3, "4/P*a^-2*ab", "kdv b=3 third-order seed"),
    ("skk", 5): (5, "1/2*a^6*ab^-1", "skk b=5 seed"),
    ("skk", 4): (5, "a^5*u5", "skk b=4 seed"),
    ("skk", 3): (5, "a^5*u5 + 5*a^4*ab*u4^2", "skk b=3 seed"),
}

# KdV operator: local part and the single nonlocal pair (sigma, rho) where the
# covariant is the variational derivative of rho.
KDV_OPERATOR = {
    "local": {2: "a^2", 1: "-ab*a*u4", 0: "ab*a*u5 + 3*ab^2*u4^2"},
    "nonlocal": [("4/P*ab*a^-2", "a^-1")],
}

# SKK operators: R^(k) coefficients of D^k, k = 0..5 (the D^6 coefficient is a^6),
# and nonlocal pairs (sigma, rho).
SKK_OPERATORS = {
    5: {
        "local": {
            5: "3*a^5*ab*u6",
            4: "2*u7*ab*a^5 + 7*u6^2*ab^2*a^4",
            3: "-u8*ab*a^5 - 16*u7*u6*ab^2*a^4 - 42*u6^3*ab^3*a^3",
            2: "u9*ab*a^5 + 21*u8*u6*ab^2*a^4 + 16*u7^2*ab^2*a^4 + 262*u7*u6^2*ab^3*a^3"
               " + 490*u6^4*ab^4*a^2",
            1: "-u10*ab*a^5 - 28*u9*u6*ab^2*a^4 - 51*u8*u7*ab^2*a^4 - 462*u8*u6^2*ab^3*a^3"
               " - 660*u7^2*u6*ab^3*a^3 - 5190*u7*u6^3*ab^4*a^2 - 7560*u6^5*ab^5*a",
            0: "u11*ab*a^5 + 35*u10*u6*ab^2*a^4 + 79*u9*u7*ab^2*a^4 + 742*u9*u6^2*ab^3*a^3"
               " + 49*u8^2*ab^2*a^4 + 2700*u8*u7*u6*ab^3*a^3 + 11060*u8*u6^3*ab^4*a^2"
               " + 660*u7^3*ab^3*a^3 + 23790*u7^2*u6^2*ab^4*a^2 + 119040*u7*u6^4*ab^5*a"
               " + 141400*u6^6*ab^6",
        },
        "nonlocal": [
            ("-(a^7*u7 + 7/2*a^6*ab*u6^2)", "a^-1"),
            ("-1/2*a^2*ab^-1", "a^-1*ab^2*u6^2"),
        ],
    },
    4: {
        "local": {
            5: "9*a^5*ab*u5",
            4: "5*a^5*ab*u6 + 34*a^4*ab^2*u5^2",
            3: "a^5*ab*u7 + 16*a^4*ab^2*u6*u5 + 42*a^3*ab^3*u5^3",
            2: "-4*a^4*ab^2*u7*u5 - 56*a^3*ab^3*u6*u5^2 - 140*a^2*ab^4*u5^4",
            1: "2*a^4*ab^2*u8 + 2*a^4*ab^2*u7*u6 + 52*a^3*ab^3*u7*u5^2"
               " + 56*a^3*ab^3*u6^2*u5 + 700*a^2*ab^4*u6*u5^3 + 1260*a*ab^5*u5^5",
            0: "-2*a^4*ab^2*u9*u5 - 2*a^4*ab^2*u7^2 - 56*a^3*ab^3*u8*u5^2"
               " - 156*a^3*ab^3*u7*u6*u5 - 1060*a^2*ab^4*u7*u5^3 - 1680*a^2*ab^4*u6^2*u5^2"
               " - 12180*a*ab^5*u6*u5^4 - 17360*ab^6*u5^6",
        },
        "nonlocal": [
            ("-(a^7*u7 + 14*a^6*ab*u6*u5 + 35*a^5*ab^2*u5^3)", "a^-1"),
            ("-a^5*u5", "a^-1*ab^2*u5^2"),
        ],
    },
    3: {
        "local": {
            5: "15*a^5*ab*u4",
            4: "14*a^5*ab*u5 + 115*a^4*ab^2*u4^2",
            3: "6*a^5*ab*u6 + 129*a^4*ab^2*u5*u4 + 450*a^3*ab^3*u4^3",
            2: "a^5*ab*u7 + 21*a^4*ab^2*u6*u4 + 16*a^4*ab^2*u5^2 + 262*a^3*ab^3*u5*u4^2"
               " + 490*a^2*ab^4*u4^4",
            1: "-2*a^4*ab^2*u7*u4 - 2*a^4*ab^2*u6*u5 - 52*a^3*ab^3*u6*u4^2"
               " - 56*a^3*ab^3*u5^2*u4 - 700*a^2*ab^4*u5*u4^3 - 1260*a*ab^5*u4^5",
            0: "4*a^4*ab^2*u7*u5 + 20*a^3*ab^3*u7*u4^2 + 84*a^3*ab^3*u6*u5*u4"
               " + 420*a^2*ab^4*u6*u4^3 + 56*a^3*ab^3*u5^3 + 1260*a^2*ab^4*u5^2*u4^2"
               " + 6720*a*ab^5*u5*u4^4 + 9100*ab^6*u4^6",
        },
        "nonlocal": [
            ("-(a^7*u7 + 21*a^6*ab*u6*u4 + 14*a^6*ab*u5^2 + 245*a^5*ab^2*u4^2*u5"
             " + 455*a^4*ab^3*u4^4)", "a^-1"),
            ("-(a^5*u5 + 5*a^4*ab*u4^2)", "a^-1*ab^2*u4^2"),
        ],
    },
}

# Places where the printed text is not well formed and a reading had to be chosen.
TRANSCRIPTION_NOTES = [
    ("skk", 3, "flow 11", "last term printed as 'u_48', read as u4^8 (level 8)"),
    ("skk", 3, "R^(3)", "coefficient printed as '6*', read as 6"),
    ("skk", 3, "sigma^(2)", "printed '-()a^5 u_5 + 5 a^4 a_3 u_4^2)', read as -(a^5 u5 + 5 a^4 ab u4^2)"),
    ("skk", 4, "R^(1)", "term printed '700 a^2 a_4^4 u_6 u_5^', read as u6*u5^3 (level 5)"),
]
