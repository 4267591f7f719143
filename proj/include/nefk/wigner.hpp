#pragma once
#include <vector>

#include "nefk/contour.hpp"

namespace nefk {

// One anti-diagonal i + j = s of a two-time table.
struct WignerSlice {
  int s = 0;
  double t_ave = 0.0;
  RVector t_rel;             // ascending, spacing 2 dt
  CVector values;
  std::vector<char> field_mix;  // exactly one of t, t' precedes t_on
  std::vector<int> i_index;     // row index of each sample
  // Largest |t_rel| such that no masked sample lies at or inside it.
  double unmasked_extent() const;
};

struct WignerField {
  double t_min = 0.0, dt = 0.0, t_on = 0.0;
  int n_t = 0;
  std::vector<WignerSlice> slices;  // indexed by s = 0 .. 2 n_t - 2
  const WignerSlice& at(double t_ave) const;
  int index_of(double t_ave) const;
};

WignerField to_wigner(const CMatrix& table, double t_min, double dt, double t_on);
CMatrix from_wigner(const WignerField& field);

struct WindowPolicy {
  double taper_fraction = 0.1;  // cosine taper over the final fraction of |t_rel|; 0 disables
  double max_t_rel = -1.0;      // truncate |t_rel| (negative: use the whole slice)
};

enum class Sidedness { one_sided, two_sided };

// F(w) = sum over t_rel of exp(i w t_rel) F(t_rel) with trapezoid weights.
CVector wigner_to_frequency(const WignerSlice& slice, const RVector& omega, Sidedness side,
                            const WindowPolicy& window = {});

// Frequencies of an n-point DFT of the slice zero-padded by the given factor,
// restricted to |w| <= omega_max.
RVector padded_frequency_grid(const WignerSlice& slice, int pad, double omega_max);

// max |G^R - theta (conj G^< - G^<)| over t >= t'.
double check_ph_relation(const CMatrix& gr, const CMatrix& gl);

struct FdtDeviation {
  double linf = 0.0;
  double l2 = 0.0;
};

// Compares spectrum_l with -2i f(w) Im spectrum_r; weights proportional to
// |Im spectrum_r| and the result normalized by max |Im spectrum_r|.
FdtDeviation check_fdt(const CVector& spectrum_r, const CVector& spectrum_l, const RVector& omega, double beta);

}  // namespace nefk
