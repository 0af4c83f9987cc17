#include "mollify/calculus.hpp"

namespace mollify {

const char* provenance_name(Provenance p) noexcept {
  switch (p) {
    case Provenance::Brute: return "brute";
    case Provenance::Weighted: return "weighted";
    case Provenance::MainTerm: return "main-term";
    case Provenance::Synthetic: return "synthetic";
  }
  return "?";
}

namespace calculus {

const char* verdict_name(Verdict v) noexcept {
  switch (v) {
    case Verdict::Flat: return "flat";
    case Verdict::Improvable: return "improvable";
    case Verdict::NotImprovable: return "not-improvable";
    case Verdict::EfficientGain: return "efficient-gain";
    case Verdict::EfficientNoGain: return "efficient-no-gain";
    case Verdict::WeakGain: return "weak-gain";
    case Verdict::WeakNoGain: return "weak-no-gain";
    case Verdict::Degenerate: return "degenerate";
  }
  return "?";
}

}  // namespace calculus
}  // namespace mollify
