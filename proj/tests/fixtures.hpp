#pragma once

#include <cstdio>
#include <string>

#include "loyalty/rng.hpp"

namespace fixtures {

// uniform leaf depth 4, matching the movie example path
inline const char* kMovieTaxonomy = R"(# demo store catalog
Product
  DigitalMedia
    Movie
      ActionMovie
        Inception
        MadMax
      DramaMovie
        Amelie
        Casablanca
    Music
      RockAlbum
        AbbeyRoad
      JazzAlbum
        KindOfBlue
  PhysicalGood
    Grocery
      Fruit
        Apple
        Banana
      Dairy
        Milk
    Apparel
      Shoes
        Sneaker
      Shirts
        TShirt
)";

// unique temp file path that does not exist yet
inline std::string temp_path(const std::string& tag) {
    static loyalty::SystemRandom& rng = loyalty::SystemRandom::instance();
    auto r = rng.bytes(8);
    char buf[128];
    snprintf(buf, sizeof buf, "/tmp/loyalty-test-%s-%02x%02x%02x%02x%02x%02x%02x%02x", tag.c_str(),
             r[0], r[1], r[2], r[3], r[4], r[5], r[6], r[7]);
    return buf;
}

}  // namespace fixtures
