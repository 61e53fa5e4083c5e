// Applies the taylor transform to a linear brightness ramp and prints the
// three output channels of one pixel over time. Channel 1 encodes velocity,
// channel 2 acceleration; a pure ramp has constant channel 1 above 0.5 and
// channel 2 exactly at 0.5.

#include <cstdio>

#include <mmg/mmg.hpp>

int main() {
    mmg::ToyVideoParams tp;
    tp.frames = 10;
    tp.height = 4;
    tp.width = 4;
    tp.base = 0.2;
    tp.beta = 0.05;
    const mmg::VideoTensor ramp = mmg::gen_toy_video("ramp", tp);

    mmg::TaylorParams params;
    params.tau = 4;
    const mmg::VideoTensor out = mmg::taylor_video(ramp, params);

    std::printf("input: g(t) = %.2f + %.2f t, %zu frames -> %zu output frames\n\n", tp.base,
                tp.beta, ramp.frames, out.frames);
    std::printf("t   intensity  velocity  acceleration\n");
    for (std::size_t t = 0; t < out.frames; ++t)
        std::printf("%zu   %9.6f %9.6f %13.6f\n", t, out.at(t, 0, 0, 0), out.at(t, 0, 0, 1),
                    out.at(t, 0, 0, 2));
    return 0;
}
