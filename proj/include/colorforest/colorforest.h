#ifndef COLORFOREST_H
#define COLORFOREST_H

/* C interface to the colorforest library: train a chroma model from color
 * reference images, colorize grayscale images or frame sequences, evaluate
 * results. All functions returning cf_status leave an explanatory message
 * in cf_last_error() on failure. Handles are opaque; free them with the
 * matching *_free function. */

#ifdef __cplusplus
extern "C" {
#endif

typedef enum cf_status {
  CF_OK = 0,
  CF_ERR_INVALID = 1,  /* bad arguments or configuration */
  CF_ERR_IO = 2,       /* file read/write/parse failures */
  CF_ERR_PIPELINE = 3  /* processing failed on valid inputs */
} cf_status;

typedef struct cf_raster cf_raster;
typedef struct cf_config cf_config;
typedef struct cf_model cf_model;

const char* cf_version(void);

/* Message for the most recent failure on this thread; empty string if none. */
const char* cf_last_error(void);

/* ---- rasters ---------------------------------------------------------- */

/* Decodes an 8/16-bit PNG into a 1- or 3-channel raster with samples in
 * [0, 1]. */
cf_status cf_raster_load_png(const char* path, cf_raster** out);
cf_status cf_raster_save_png(const cf_raster* raster, const char* path);

/* samples: planar channel-major width*height*channels doubles, or NULL for
 * an all-zero raster. channels must be 1 or 3. */
cf_status cf_raster_create(int width, int height, int channels,
                           const double* samples, cf_raster** out);
void cf_raster_free(cf_raster* raster);

int cf_raster_width(const cf_raster* raster);
int cf_raster_height(const cf_raster* raster);
int cf_raster_channels(const cf_raster* raster);

/* Borrowed pointer to the planar sample array; valid until the raster is
 * freed. */
const double* cf_raster_samples(const cf_raster* raster);

/* 3-channel -> BT.601 luminance; 1-channel inputs are copied. */
cf_status cf_raster_to_gray(const cf_raster* raster, cf_raster** out);

/* ---- configuration ----------------------------------------------------- */

/* Fresh config with library defaults. */
cf_status cf_config_create(cf_config** out);
void cf_config_free(cf_config* config);

/* Keys mirror the model config: target_superpixel_size, clusters, trees,
 * dims_per_node, thresholds_per_dim, min_gain, max_depth, min_node,
 * bootstrap, spatial_bandwidth, range_bandwidth, min_region, cg_tolerance,
 * seed. The extra key "threads" controls training parallelism only and is
 * never persisted. */
cf_status cf_config_set(cf_config* config, const char* key, const char* value);

/* Applies `key=value` lines from a file over the current values. */
cf_status cf_config_load_file(cf_config* config, const char* path);

/* ---- training and models ------------------------------------------------ */

/* Trains on ref_count 3-channel rasters. per_ref_superpixels, when non-NULL,
 * receives ref_count superpixel counts. */
cf_status cf_train(const cf_raster* const* references, int ref_count,
                   const cf_config* config, cf_model** out,
                   int* per_ref_superpixels);

cf_status cf_model_save(const cf_model* model, const char* path);
cf_status cf_model_load(const char* path, cf_model** out);
void cf_model_free(cf_model* model);

int cf_model_palette_size(const cf_model* model);
int cf_model_tree_count(const cf_model* model);

/* ---- colorization ------------------------------------------------------- */

typedef struct cf_colorize_options {
  const char* merge_map_path;       /* `<id> <id>` lines merging segments */
  const char* dump_segments_path;   /* 16-bit PNG of segment ids */
  const char* dump_superpixels_path;/* 16-bit PNG of superpixel ids */
  const char* dump_scribbles_path;  /* text lines `row col U V` */
} cf_colorize_options;

/* gray may be 1-channel or 3-channel (converted to luminance). options may
 * be NULL; so may any individual path. */
cf_status cf_colorize(const cf_model* model, const cf_raster* gray,
                      const cf_colorize_options* options, cf_raster** out);

/* Mean CIELab (a,b) distance and 8-bit RGB PSNR (capped at 99 dB).
 * 1-channel inputs are promoted to 3 identical channels. */
cf_status cf_evaluate(const cf_raster* result, const cf_raster* truth,
                      double* mean_ab_error, double* psnr);

#ifdef __cplusplus
}
#endif

#endif /* COLORFOREST_H */
