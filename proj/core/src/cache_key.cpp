#include "storyverb/cache_key.hpp"

#include "storyverb/digest.hpp"

namespace storyverb {

namespace {

void put_field(std::string& buf, std::string_view field) {
    buf += std::to_string(field.size());
    buf += ':';
    buf += field;
}

}  // namespace

std::string cache_key(std::string_view stage, std::string_view video_id,
                      std::string_view config_slice) {
    // Length-prefixed so no two argument triples share an encoding.
    std::string buf = "storyverb-cache-v1;";
    put_field(buf, stage);
    put_field(buf, video_id);
    put_field(buf, config_slice);
    return sha256_hex(buf);
}

}  // namespace storyverb
