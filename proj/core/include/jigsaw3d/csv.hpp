#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

namespace jigsaw3d {

// %.17g: round-trips every double.
std::string format_real(double value);

// "cloud_id,class_label,e0,...,e{D-1}". Missing labels are written as -1.
std::string embeddings_csv(std::span<const std::size_t> cloud_ids, std::span<const int> labels,
                           std::span<const std::vector<double>> embeddings);

// "cloud_id,class_label,pc1,pc2".
std::string pca_csv(std::span<const std::size_t> cloud_ids, std::span<const int> labels,
                    std::span<const std::array<double, 2>> coords);

}  // namespace jigsaw3d
