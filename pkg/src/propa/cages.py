# Edge lists of the cubic cages used as the large-girth family.
# Petersen is Kneser(5,2) on the lex-ordered 2-subsets of {0..4};
# Heawood, McGee and Tutte-Coxeter are in LCF numbering.

PETERSEN = [
    (0, 7), (0, 8), (0, 9), (1, 5), (1, 6), (1, 9), (2, 4), (2, 6), (2, 8),
    (3, 4), (3, 5), (3, 7), (4, 9), (5, 8), (6, 7),
]

HEAWOOD = [
    (0, 1), (0, 5), (0, 13), (1, 2), (1, 10), (2, 3), (2, 7), (3, 4), (3, 12),
    (4, 5), (4, 9), (5, 6), (6, 7), (6, 11), (7, 8), (8, 9), (8, 13), (9, 10),
    (10, 11), (11, 12), (12, 13),
]

MCGEE = [
    (0, 1), (0, 12), (0, 23), (1, 2), (1, 8), (2, 3), (2, 19), (3, 4), (3, 15),
    (4, 5), (4, 11), (5, 6), (5, 22), (6, 7), (6, 18), (7, 8), (7, 14), (8, 9),
    (9, 10), (9, 21), (10, 11), (10, 17), (11, 12), (12, 13), (13, 14), (13, 20),
    (14, 15), (15, 16), (16, 17), (16, 23), (17, 18), (18, 19), (19, 20),
    (20, 21), (21, 22), (22, 23),
]

TUTTE_COXETER = [
    (0, 1), (0, 17), (0, 29), (1, 2), (1, 22), (2, 3), (2, 9), (3, 4), (3, 26),
    (4, 5), (4, 13), (5, 6), (5, 18), (6, 7), (6, 23), (7, 8), (7, 28), (8, 9),
    (8, 15), (9, 10), (10, 11), (10, 19), (11, 12), (11, 24), (12, 13), (12, 29),
    (13, 14), (14, 15), (14, 21), (15, 16), (16, 17), (16, 25), (17, 18),
    (18, 19), (19, 20), (20, 21), (20, 27), (21, 22), (22, 23), (23, 24),
    (24, 25), (25, 26), (26, 27), (27, 28), (28, 29),
]

NAMED = {
    "petersen": (10, PETERSEN),
    "heawood": (14, HEAWOOD),
    "mcgee": (24, MCGEE),
    "tutte-coxeter": (30, TUTTE_COXETER),
}
