#pragma once

#include <string>
#include <vector>

namespace resonet {

struct check_item {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct criterion_result {
  int index = 0;
  std::string title;
  bool pass = false; // conjunction of all items
  double runtime_s = 0.0;
  std::vector<check_item> items;
};

// the nine built-in acceptance checks, in their contract order
criterion_result check_preset_derivations();  // golden values + line-shape agreement
criterion_result check_coupling_ratio();      // hanger-lambda/2 vs necklace factor 4
criterion_result check_end_to_end_recovery(); // reference preset through the pipeline
criterion_result check_unitarity();           // lossless |s11|^2 + |s21|^2 = 1
criterion_result check_reciprocity();         // s12 = s21 and det(ABCD) = 1
criterion_result check_resonance_root();      // impedance root vs closed-form omega_r
criterion_result check_circle_fit();          // synthetic circle recovery + degeneracy
criterion_result check_model_roundtrip();     // line-shape generate -> fit round trip
criterion_result check_duality();             // bridge vs necklace sign structure

std::vector<criterion_result> run_acceptance_suite();

} // namespace resonet
