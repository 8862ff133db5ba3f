"""Named declaration snippets, written in the config grammar.

A config line ``use NAME`` (or a CLI flag naming ``NAME``) splices the snippet
in.  Names inside a snippet are prefixed with ``NAME.`` except the pair,
context or extension itself, which is called ``NAME``.
"""

CATALOG = {
    "integers": """
group integers.G = integers
subgroup integers.H = trivial(integers.G)
pair integers = (integers.G, integers.H)
length integers.L = word(integers.G)
""",
    "free2": """
group free2.G = free(2)
subgroup free2.H = trivial(free2.G)
pair free2 = (free2.G, free2.H)
length free2.L = word(free2.G)
""",
    "s3": """
group s3.G = symmetric(3)
subgroup s3.H = generated(s3.G, "(0 1)")
pair s3 = (s3.G, s3.H)
length s3.L = averaged(word(s3.G), s3.H)
""",
    "dihedral": """
group dihedral.G = free_product(cyclic(2), cyclic(2))
subgroup dihedral.H = relations(dihedral.G)
pair dihedral = (dihedral.G, dihedral.H)
length dihedral.L = quotient(dihedral.G, dihedral.H)
""",
    "dihedral_diag": """
group dihedral_diag.G = free_product(cyclic(2), cyclic(2))
subgroup dihedral_diag.H = preimage(dihedral_diag.G, "(1, 1)")
pair dihedral_diag = (dihedral_diag.G, dihedral_diag.H)
length dihedral_diag.L = quotient(dihedral_diag.G, dihedral_diag.H)
""",
    "bost_connes": """
group bost_connes.G = affine_rationals(2, 3, 5)
group bost_connes.Q = positive_rationals(2, 3, 5)
subgroup bost_connes.H = integer_translations(bost_connes.G)
pair bost_connes = (bost_connes.G, bost_connes.H)
hom bost_connes.pr = dilation_part(bost_connes.G, bost_connes.Q)
length bost_connes.L = pullback(bost_connes.pr, word(bost_connes.Q))
""",
    "z_2z_4z": """
group z_2z_4z.G = integers
subgroup z_2z_4z.H = multiples(z_2z_4z.G, 2)
subgroup z_2z_4z.K = multiples(z_2z_4z.G, 4)
length z_2z_4z.L = quotient(z_2z_4z.G, z_2z_4z.H)
""",
    "z_2z_6z": """
group z_2z_6z.G = integers
subgroup z_2z_6z.H = multiples(z_2z_6z.G, 2)
subgroup z_2z_6z.K = multiples(z_2z_6z.G, 6)
length z_2z_6z.L = quotient(z_2z_6z.G, z_2z_6z.H)
""",
    "dihedral_transfer": """
group dihedral_transfer.G = free_product(cyclic(2), cyclic(2))
subgroup dihedral_transfer.H = preimage(dihedral_transfer.G, "(1, 1)")
subgroup dihedral_transfer.K = relations(dihedral_transfer.G)
length dihedral_transfer.L = quotient(dihedral_transfer.G, dihedral_transfer.H)
""",
    "carry3": """
extension carry3 = carry(3)
""",
    "carry4": """
extension carry4 = carry(4)
""",
    "dihedral_ext": """
group dihedral_ext.G = free_product(cyclic(2), cyclic(2))
extension dihedral_ext = relations_extension(dihedral_ext.G)
""",
    "bost_connes_ext": """
group bost_connes_ext.G = affine_rationals(2, 3, 5)
subgroup bost_connes_ext.H = integer_translations(bost_connes_ext.G)
extension bost_connes_ext = dilation_extension(bost_connes_ext.G)
""",
    "trivial_semidirect": """
group trivial_semidirect.E = semidirect(integers, cyclic(2), [1])
subgroup trivial_semidirect.H = factor(trivial_semidirect.E, 2)
extension trivial_semidirect = split(trivial_semidirect.E)
""",
    "negation_semidirect": """
group negation_semidirect.E = semidirect(integers, cyclic(2), [-1])
subgroup negation_semidirect.H = factor(negation_semidirect.E, 2)
extension negation_semidirect = split(negation_semidirect.E)
""",
    "swap_semidirect": """
group swap_semidirect.E = semidirect(free_abelian(2), cyclic(2), [(0, 1), (1, 0)])
subgroup swap_semidirect.H = factor_diagonal(swap_semidirect.E)
extension swap_semidirect = split(swap_semidirect.E)
""",
}


def snippet(name):
    return CATALOG[name].strip("\n")
