// storycast-book: offline utilities for book files, the library and voices.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <unistd.h>

#include <CLI11.hpp>

#include "storycast/library_store.hpp"
#include "storycast/script_parser.hpp"
#include "storycast/tts_gateway.hpp"

namespace fs = std::filesystem;

namespace {

storycast::BookDocument read_document(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return storycast::BookDocument{buf.str()};
}

void write_bytes(const std::string& path, std::string_view bytes) {
  if (path == "-") {
    std::cout.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Book file and voice utilities"};
  app.require_subcommand(1);

  std::string file;
  std::string output = "-";
  std::string library = "library";
  int voice = 1;
  std::string cache;

  auto* validate = app.add_subcommand("validate", "Parse and validate a book file");
  validate->add_option("file", file, "Book file")->required();

  auto* fmt = app.add_subcommand("fmt", "Print the canonical form of a book file");
  fmt->add_option("file", file, "Book file")->required();
  fmt->add_option("-o,--output", output, "Output path ('-' for stdout)")->capture_default_str();

  auto* import = app.add_subcommand("import", "Import a book file into a library");
  import->add_option("file", file, "Book file")->required();
  import->add_option("--library", library, "Library directory")->capture_default_str();

  auto* list = app.add_subcommand("list", "List the books in a library");
  list->add_option("--library", library, "Library directory")->capture_default_str();

  auto* preview = app.add_subcommand("preview", "Write a voice's greeting clip (mock backend)");
  preview->add_option("--voice", voice, "Voice 1-6")->required()->check(CLI::Range(1, 6));
  preview->add_option("-o,--output", output, "Output WAV path")->required();
  preview->add_option("--cache", cache, "Cache directory (temporary when omitted)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*validate) {
      const auto book = storycast::parse_book(read_document(file));
      std::cout << "ok " << book.id << ": " << book.characters.size() << " characters, "
                << book.lines.size() << " lines\n";
    } else if (*fmt) {
      write_bytes(output, storycast::serialize_book(storycast::parse_book(read_document(file))).bytes);
    } else if (*import) {
      storycast::LibraryStore store(library);
      std::cout << "imported " << store.import_book(read_document(file)) << '\n';
    } else if (*list) {
      storycast::LibraryStore store(library);
      for (const auto& b : store.list_books()) {
        std::cout << b.id << '\t' << b.title << '\t' << b.age_range.min << '-' << b.age_range.max
                  << '\n';
      }
    } else if (*preview) {
      const bool temporary = cache.empty();
      if (temporary) {
        cache = (fs::temp_directory_path() / ("storycast-preview-" + std::to_string(::getpid())))
                    .string();
      }
      std::string bytes;
      {
        storycast::TtsGateway gateway(std::make_unique<storycast::MockBackend>(), cache);
        const auto asset =
            gateway.synthesize(storycast::preview_greeting(storycast::VoiceId(voice)));
        bytes.assign(asset.bytes.begin(), asset.bytes.end());
      }
      if (temporary) fs::remove_all(cache);
      write_bytes(output, bytes);
    }
  } catch (const storycast::Error& e) {
    std::cerr << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
