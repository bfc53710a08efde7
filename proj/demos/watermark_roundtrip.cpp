// End-to-end walkthrough: draw a latent, embed a QR-carrying symmetric
// watermark plus its companion noise key, push everything through the
// surrogate channel with a JPEG attack, then score and decode what's left.

#include <cstdio>

#include "sfw/channel.hpp"
#include "sfw/detection.hpp"
#include "sfw/latent.hpp"

int main() {
  using namespace sfw;

  KeySpec spec;
  spec.kind = WatermarkKind::hsqr;
  spec.region = EmbedRegion::center_aware;
  KeyBundle bundle = make_bundle(spec, true, 2024);
  KeyBundle rival = make_bundle(spec, true, 4048);

  std::printf("payload           %s\n", bundle.method.payload.to_hex().c_str());

  LatentTensor clean = gaussian_latent(4, 64, 64, 7);
  LatentTensor marked = embed_bundle(clean, bundle);

  AttackSpec jpeg;
  jpeg.kind = AttackKind::jpeg;
  jpeg.quality = 50;
  ChannelConfig channel;
  channel.seed = 11;
  LatentTensor received = channel_roundtrip(marked, jpeg, channel);

  std::printf("distance (true key)   %10.2f\n", bundle_distance(received, bundle));
  std::printf("distance (other key)  %10.2f\n", bundle_distance(received, rival));
  std::printf("distance (no mark)    %10.2f\n",
              bundle_distance(channel_roundtrip(clean, jpeg, channel), bundle));

  auto decoded = decode_hsqr(extract_spectrum(received, bundle.method.channel, bundle.method.region),
                             bundle.method);
  if (!decoded) {
    std::printf("payload did not survive the channel\n");
    return 1;
  }
  std::printf("decoded payload   %s  (%d codewords repaired)\n", decoded->payload.to_hex().c_str(),
              decoded->corrected);
  return decoded->payload == bundle.method.payload ? 0 : 1;
}
