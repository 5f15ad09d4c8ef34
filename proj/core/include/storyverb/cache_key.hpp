#pragma once

#include <string>
#include <string_view>

namespace storyverb {

// Content-addressed key for a stage output. `config_slice` must hold only the
// canonical bytes of config fields (and backend ids) that affect the stage.
std::string cache_key(std::string_view stage, std::string_view video_id,
                      std::string_view config_slice);

}  // namespace storyverb
