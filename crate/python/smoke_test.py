"""Smoke test for the rasm extension module.

Build first:  maturin develop -m crates/py/Cargo.toml --release
"""

import rasm


def main():
    cfg = rasm.SystemConfig(8, 4, order=2)
    assert cfg.bpcu() == 4, cfg.bpcu()
    print(cfg)
    print(cfg.table_text())

    table = rasm.select_acs(4, 0)
    assert len(table) == 8 and all(len(ac) >= 1 for ac in table)
    assert rasm.parse_table(4, "1\n2,3\n") == [[0], [1, 2]]

    bpsk = rasm.make_constellation(2)
    assert abs(bpsk[0] - 1) < 1e-12 and abs(bpsk[1] + 1) < 1e-12
    assert abs(rasm.noise_power(10.0) - 0.1) < 1e-15

    noiseless = rasm.run_ber(cfg, [300.0], 2000)
    assert noiseless[0][1] == 0.0, noiseless

    grid = [0.0, 10.0]
    a = rasm.run_ber(cfg, grid, 20000, threads=1)
    b = rasm.run_ber(cfg, grid, 20000, threads=2)
    assert a == b, (a, b)
    for snr, ber, ci, trials, errors in a:
        print(f"sim     {snr:5.1f} dB  ber {ber:.3e} +- {ci:.1e}  ({errors} errors / {trials})")

    bound = rasm.analyze(cfg, grid)
    assert bound[0][1] > bound[1][1]
    for snr, aber in bound:
        print(f"bound   {snr:5.1f} dB  aber {aber:.3e}")

    rgsm = rasm.SystemConfig(8, 6, scheme="RGSM", n_s=3)
    assert rgsm.bpcu() == 5
    try:
        rasm.SystemConfig(8, 6, scheme="RGSM")
    except ValueError as e:
        print("rejected:", e)
    else:
        raise AssertionError("missing n_s accepted")

    print("smoke test passed")


if __name__ == "__main__":
    main()
