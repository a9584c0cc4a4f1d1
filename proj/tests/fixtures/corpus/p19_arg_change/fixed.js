import { get } from '@ember/object';
const key = 'currentUser.user';
const other = 'currentUser.name';
const user = get(key);
export default user;
