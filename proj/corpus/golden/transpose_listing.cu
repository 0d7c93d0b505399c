#include <cstddef>
#include <cuda_runtime.h>

template <typename T>
static T* descend_cpu_new(std::size_t n, T value) {
  T* p = new T[n];
  for (std::size_t i = 0; i < n; ++i) p[i] = value;
  return p;
}

template <typename T>
static T* descend_alloc_copy(const T* src, std::size_t n) {
  T* p = nullptr;
  cudaMalloc(&p, n * sizeof(T));
  cudaMemcpy(p, src, n * sizeof(T), cudaMemcpyHostToDevice);
  return p;
}

template <typename T>
static void descend_copy_to_host(const T* src, T* dst, std::size_t n) {
  cudaMemcpy(dst, src, n * sizeof(T), cudaMemcpyDeviceToHost);
}

template <typename T>
static void descend_copy_to_gpu(T* dst, const T* src, std::size_t n) {
  cudaMemcpy(dst, src, n * sizeof(T), cudaMemcpyHostToDevice);
}

__global__ void transpose(const double* input, double* output) {
  {
    __shared__ double tmp[1024];
    {
      for (int i = 0; i < 4; ++i) {
        tmp[(i*8 + threadIdx.y)*32 + threadIdx.x] = input[(blockIdx.y*32 + i*8 + threadIdx.y)*2048 + blockIdx.x*32 + threadIdx.x];
      }
      __syncthreads();
      for (int i = 0; i < 4; ++i) {
        output[(blockIdx.x*32 + i*8 + threadIdx.y)*2048 + blockIdx.y*32 + threadIdx.x] = tmp[threadIdx.x*32 + i*8 + threadIdx.y];
      }
    }
  }
}
