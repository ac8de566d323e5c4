#include "jigsaw3d/csv.hpp"

#include <cstdio>
#include <sstream>

#include "jigsaw3d/errors.hpp"

namespace jigsaw3d {

std::string format_real(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

std::string embeddings_csv(std::span<const std::size_t> cloud_ids, std::span<const int> labels,
                           std::span<const std::vector<double>> embeddings) {
  require(cloud_ids.size() == embeddings.size() && labels.size() == embeddings.size(),
          "embeddings_csv: inputs must align");
  const std::size_t dim = embeddings.empty() ? 0 : embeddings.front().size();
  std::ostringstream os;
  os << "cloud_id,class_label";
  for (std::size_t d = 0; d < dim; ++d) os << ",e" << d;
  os << "\n";
  for (std::size_t i = 0; i < embeddings.size(); ++i) {
    os << cloud_ids[i] << ',' << labels[i];
    for (double v : embeddings[i]) os << ',' << format_real(v);
    os << "\n";
  }
  return os.str();
}

std::string pca_csv(std::span<const std::size_t> cloud_ids, std::span<const int> labels,
                    std::span<const std::array<double, 2>> coords) {
  require(cloud_ids.size() == coords.size() && labels.size() == coords.size(),
          "pca_csv: inputs must align");
  std::ostringstream os;
  os << "cloud_id,class_label,pc1,pc2\n";
  for (std::size_t i = 0; i < coords.size(); ++i) {
    os << cloud_ids[i] << ',' << labels[i] << ',' << format_real(coords[i][0]) << ','
       << format_real(coords[i][1]) << "\n";
  }
  return os.str();
}

}  // namespace jigsaw3d
