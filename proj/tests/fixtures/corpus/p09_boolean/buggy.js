const config = {
  debug: true,
  port: 8080,
};
export default config;
