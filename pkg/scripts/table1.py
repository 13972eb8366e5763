"""Regenerate the four core-cache resource rows and compare with the reference values."""
from surgekit.resources import TABLE1, table1


def main():
    print(f"{'L':>3} {'h':>3} {'w':>3} {'d_x':>4} {'d_z':>4} {'d_m':>4} {'N_phys':>8} "
          f"{'core':>5} {'cache':>6} {'O_total':>8}  reference")
    for est, (_, ref) in zip(table1(), TABLE1):
        print(f"{est.L:>3} {est.h:>3} {est.w:>3} {est.d_x:>4} {est.d_z:>4} {est.d_m:>4} "
              f"{est.N_phys:>8} {est.N_core:>5} {est.N_2:>6} {float(est.O_total):>8.4f}  {ref}")


if __name__ == "__main__":
    main()
