#include "webtrail/screenshot.hpp"

#include <png.h>

#include <array>
#include <fstream>
#include <sstream>

#include "webtrail/hash.hpp"

namespace webtrail {
namespace {

constexpr int kWidth = 352;

std::array<unsigned char, 3> role_color(ElementRole role) {
  switch (role) {
    case ElementRole::link: return {0x3b, 0x6e, 0xd8};
    case ElementRole::button: return {0x2e, 0x9d, 0x5b};
    case ElementRole::textbox: return {0xd0, 0xd0, 0xd0};
    case ElementRole::select: return {0xb0, 0x8a, 0x3e};
    case ElementRole::checkbox: return {0x8e, 0x4f, 0xc2};
    case ElementRole::menu_toggle: return {0xd8, 0x5a, 0x3b};
    case ElementRole::other: break;
  }
  return {0x80, 0x80, 0x80};
}

void append_png(png_structp png, png_bytep data, png_size_t length) {
  auto* out = static_cast<std::string*>(png_get_io_ptr(png));
  out->append(reinterpret_cast<const char*>(data), length);
}

struct Canvas {
  std::vector<unsigned char> pixels;  // RGB rows of kWidth pixels
  int height = 0;
};

// Kept apart from the drawing code so no locals live across setjmp.
std::string encode_png(const Canvas& canvas) {
  std::string out;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png_create_info_struct(png);
  if (!png || !info || setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error(ErrorCode::write_failure, "png encoding failed");
  }
  png_set_write_fn(png, &out, append_png, nullptr);
  png_set_IHDR(png, info, kWidth, canvas.height, 8, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_set_compression_level(png, 6);
  png_write_info(png, info);
  for (int y = 0; y < canvas.height; ++y) {
    const auto* row = &canvas.pixels[static_cast<std::size_t>(y) * kWidth * 3];
    png_write_row(png, const_cast<png_bytep>(row));
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return out;
}

}  // namespace

std::string render_placeholder_png(const Observation& observation) {
  int height = 32;
  for (const auto& e : observation.elements) height = std::max(height, e.region.y + e.region.height + 16);

  std::vector<unsigned char> pixels(static_cast<std::size_t>(kWidth) * height * 3, 0xff);
  for (const auto& e : observation.elements) {
    const auto color = role_color(e.role);
    for (int y = std::max(0, e.region.y); y < std::min(height, e.region.y + e.region.height); ++y) {
      for (int x = std::max(0, e.region.x); x < std::min(kWidth, e.region.x + e.region.width); ++x) {
        auto* px = &pixels[(static_cast<std::size_t>(y) * kWidth + x) * 3];
        px[0] = color[0];
        px[1] = color[1];
        px[2] = color[2];
      }
    }
  }

  return encode_png(Canvas{std::move(pixels), height});
}

ScreenshotStore::ScreenshotStore(std::filesystem::path run_dir) : root_(std::move(run_dir)) {}

bool ScreenshotStore::contains(const std::string& handle) const {
  return !handle.empty() && std::filesystem::is_regular_file(path_of(handle));
}

void ScreenshotStore::put(const std::string& handle, const std::string& png) {
  std::lock_guard lock(mutex_);
  const auto path = path_of(handle);
  if (std::filesystem::exists(path)) return;
  std::error_code ec;
  std::filesystem::create_directories(path.parent_path(), ec);
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    out.write(png.data(), static_cast<std::streamsize>(png.size()));
    if (!out) throw Error(ErrorCode::write_failure, "cannot write " + tmp);
  }
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::write_failure, "cannot write " + path.string() + ": " + ec.message());
}

std::string ScreenshotStore::put_bytes(const std::string& png) {
  std::string handle = "images/" + sha256_hex(png).substr(0, 16) + ".png";
  put(handle, png);
  return handle;
}

std::string ScreenshotStore::read(const std::string& handle) const {
  std::ifstream in(path_of(handle), std::ios::binary);
  if (!in) throw Error(ErrorCode::missing_screenshot, "image '" + handle + "' not found");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace webtrail
