const api = {
  options: {},
  fetchVoiceRegions() {
    return [];
  },
  load(options) {
    this.fetchVoiceRegions();
  },
};
