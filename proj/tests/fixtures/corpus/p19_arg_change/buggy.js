import { get } from '@ember/object';
const key = 'currentUser.user';
const other = 'currentUser.name';
const user = get(other);
export default user;
