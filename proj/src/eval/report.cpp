#include "aecd/eval/eval.hpp"

#include <iomanip>
#include <sstream>

namespace aecd::eval {

std::string confusion_text(const ConfusionMatrix& m) {
  std::ostringstream out;
  out << "true\\pred";
  for (std::size_t c = 0; c < kClassCount; ++c) out << ',' << to_string(class_from_index(c));
  out << '\n';
  for (std::size_t r = 0; r < kClassCount; ++r) {
    out << to_string(class_from_index(r));
    for (std::size_t c = 0; c < kClassCount; ++c) out << ',' << m.counts[r][c];
    out << '\n';
  }
  return out.str();
}

std::string sweep_csv(const SweepResult& r) {
  std::ostringstream out;
  out << std::setprecision(17);
  out << "lambda,d_lstm,seed,train_acc,val_acc,test_acc,epochs,j_trn,j_val,wall_time_s\n";
  for (const auto& c : r.cells) {
    out << descriptors::to_int(c.lambda) << ',' << c.d_lstm << ',' << c.seed << ',';
    if (c.ok) {
      out << c.train_acc << ',' << c.val_acc << ',' << c.test_acc << ',' << c.epochs << ',' << c.j_trn << ','
          << c.j_val << ',' << c.wall_time_s << '\n';
    } else {
      out << "nan,nan,nan,0,nan,nan," << c.wall_time_s << '\n';
    }
  }
  return out.str();
}
}  // namespace aecd::eval
