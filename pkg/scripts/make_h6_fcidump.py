"""Generate an RHF/STO-6G FCIDUMP for the shipped H6 geometry (requires pyscf).

    python3 scripts/make_h6_fcidump.py out.fcidump
"""

import sys

from pyscf import ao2mo, gto, scf, symm, tools

from spinwn.vqe import h6_geometry


def main(path: str) -> None:
    atoms = [(a, (x, y, z)) for a, x, y, z in h6_geometry()]
    mol = gto.M(atom=atoms, basis="sto-6g", unit="Angstrom", symmetry="D2h", verbose=0)
    mf = scf.RHF(mol).run()
    orbsym = symm.label_orb_symm(mol, mol.irrep_id, mol.symm_orb, mf.mo_coeff)
    c = mf.mo_coeff
    h1 = c.T @ mf.get_hcore() @ c
    eri = ao2mo.full(mol, c)
    # 1-based labels, XOR-compatible within D2h
    labels = [int(o) + 1 for o in orbsym]
    tools.fcidump.from_integrals(path, h1, eri, c.shape[1], mol.nelectron, mol.energy_nuc(), 0, labels, tol=1e-15)
    print(f"E(RHF) = {mf.e_tot:.10f}; ORBSYM {labels}")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "h6_sto6g.fcidump")
