#pragma once

#include "wmr/retrieve.hpp"

#include <filesystem>

namespace wmr {

/// Four side-by-side panels of the registered square's size: input image
/// (resized), registered confidence map, binary map, accepted centroids.
ImageBuffer overlay_panels(const ImageBuffer& img, const RetrievalDiagnostics& d);

void overlay_diagnostics(const ImageBuffer& img, const RetrievalDiagnostics& d, const std::filesystem::path& path);

}  // namespace wmr
